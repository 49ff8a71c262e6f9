def find_user(db, username):
    query = "SELECT * FROM users WHERE name = ?"
    return db.execute(query, (username,)).fetchone()
